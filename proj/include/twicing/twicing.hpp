#pragma once

#include "twicing/attention.hpp"
#include "twicing/collapse.hpp"
#include "twicing/eigen.hpp"
#include "twicing/error.hpp"
#include "twicing/gradcheck.hpp"
#include "twicing/io.hpp"
#include "twicing/matrix.hpp"
#include "twicing/nlm.hpp"
#include "twicing/npr.hpp"
#include "twicing/quadrature.hpp"
#include "twicing/random.hpp"
#include "twicing/spectral.hpp"
