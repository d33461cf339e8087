#pragma once

#include "projls/csv.hpp"
#include "projls/data.hpp"
#include "projls/error.hpp"
#include "projls/estimators.hpp"
#include "projls/evaluation.hpp"
#include "projls/harness.hpp"
#include "projls/numerics.hpp"
#include "projls/qp.hpp"
#include "projls/report.hpp"
#include "projls/rng.hpp"
