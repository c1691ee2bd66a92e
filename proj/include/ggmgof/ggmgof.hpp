#pragma once

#include "ggmgof/covid_ingest.hpp"
#include "ggmgof/edge_set.hpp"
#include "ggmgof/error.hpp"
#include "ggmgof/estimator.hpp"
#include "ggmgof/gee.hpp"
#include "ggmgof/gof_test.hpp"
#include "ggmgof/io.hpp"
#include "ggmgof/matrix_gen.hpp"
#include "ggmgof/montecarlo.hpp"
#include "ggmgof/sampler.hpp"
