#pragma once

#include "scalar.hpp"
#include "errors.hpp"
#include "poly.hpp"
#include "matrix.hpp"
#include "spectra.hpp"
#include "algebra.hpp"
#include "hensel.hpp"
#include "decomp.hpp"
#include "staru.hpp"
#include "json_io.hpp"
#include "cli.hpp"
