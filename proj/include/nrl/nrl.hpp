#pragma once

#include "arithmetic_functions.hpp"
#include "asymptotic_audit.hpp"
#include "asymptotic_series.hpp"
#include "constants.hpp"
#include "err_bound.hpp"
#include "errors.hpp"
#include "fitting.hpp"
#include "inequality_checks.hpp"
#include "prime_engine.hpp"
#include "reports.hpp"
#include "run_store.hpp"
#include "scan_driver.hpp"
