#pragma once

#include "mcs/confidence_set.hpp"
#include "mcs/csv.hpp"
#include "mcs/dataset.hpp"
#include "mcs/dgp.hpp"
#include "mcs/error.hpp"
#include "mcs/experiments.hpp"
#include "mcs/forest.hpp"
#include "mcs/hypothesis.hpp"
#include "mcs/learners.hpp"
#include "mcs/linear.hpp"
#include "mcs/loss.hpp"
#include "mcs/model.hpp"
#include "mcs/quantile.hpp"
#include "mcs/report.hpp"
#include "mcs/risk.hpp"
#include "mcs/rng.hpp"
#include "mcs/split.hpp"
