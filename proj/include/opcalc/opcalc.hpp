#pragma once

#include "opcalc/types.hpp"
#include "opcalc/measure.hpp"
#include "opcalc/quadrature.hpp"
#include "opcalc/generator.hpp"
#include "opcalc/spectral.hpp"
#include "opcalc/symbols.hpp"
#include "opcalc/catalog.hpp"
#include "opcalc/hp.hpp"
#include "opcalc/bp.hpp"
#include "opcalc/rules.hpp"
#include "opcalc/ensemble.hpp"
#include "opcalc/io.hpp"
#include "opcalc/suites.hpp"
