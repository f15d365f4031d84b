#pragma once

#include "wgc/errors.hpp"
#include "wgc/numeric.hpp"
#include "wgc/grid.hpp"
#include "wgc/fft.hpp"
#include "wgc/field.hpp"
#include "wgc/field_io.hpp"
#include "wgc/regions.hpp"
#include "wgc/propagators.hpp"
#include "wgc/floquet.hpp"
#include "wgc/quadrature.hpp"
#include "wgc/krylov.hpp"
#include "wgc/observability.hpp"
#include "wgc/hum.hpp"
#include "wgc/xsb.hpp"
