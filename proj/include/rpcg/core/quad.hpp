#pragma once

// 113-bit float usable as an Eigen scalar, for checking identities whose
// terms fall below double rounding.

#include <boost/multiprecision/eigen.hpp>
#include <boost/multiprecision/float128.hpp>

namespace rpcg {

using Quad = boost::multiprecision::float128;

}  // namespace rpcg
