#pragma once

#include "listpolar/diagnostics.hpp"
#include "listpolar/dgp.hpp"
#include "listpolar/errors.hpp"
#include "listpolar/estimators.hpp"
#include "listpolar/io.hpp"
#include "listpolar/likelihood.hpp"
#include "listpolar/math.hpp"
#include "listpolar/montecarlo.hpp"
#include "listpolar/optim.hpp"
#include "listpolar/plot.hpp"
