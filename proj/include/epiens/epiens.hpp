/**
 * @file epiens.hpp
 * @brief Umbrella header: logistic growth fits and perturbed-observation ensembles.
 */
#pragma once

#include "case_series.hpp"
#include "dataio.hpp"
#include "diagnostics.hpp"
#include "ensemble.hpp"
#include "errors.hpp"
#include "fitting.hpp"
#include "logistic.hpp"
#include "stats.hpp"
#include "verification.hpp"
