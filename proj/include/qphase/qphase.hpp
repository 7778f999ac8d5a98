#pragma once

#include "qphase/dynamics.hpp"
#include "qphase/errors.hpp"
#include "qphase/fock.hpp"
#include "qphase/hermite.hpp"
#include "qphase/marginals.hpp"
#include "qphase/measurement.hpp"
#include "qphase/ordering.hpp"
#include "qphase/phasespace.hpp"
#include "qphase/polynomial.hpp"
#include "qphase/specparse.hpp"
