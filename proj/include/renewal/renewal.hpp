#pragma once

#include "renewal/config.hpp"
#include "renewal/constants.hpp"
#include "renewal/corpus.hpp"
#include "renewal/discrete_engine.hpp"
#include "renewal/error.hpp"
#include "renewal/laplace.hpp"
#include "renewal/model.hpp"
#include "renewal/numeric.hpp"
#include "renewal/report.hpp"
#include "renewal/volterra_engine.hpp"
