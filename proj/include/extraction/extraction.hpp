#pragma once

#include "extraction/errors.hpp"
#include "extraction/fem_core.hpp"
#include "extraction/harness.hpp"
#include "extraction/interface_geometry.hpp"
#include "extraction/linalg.hpp"
#include "extraction/mesh.hpp"
#include "extraction/quadrature.hpp"
#include "extraction/singular_field.hpp"
#include "extraction/stokes.hpp"
#include "extraction/vec2.hpp"
