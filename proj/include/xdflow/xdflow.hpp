#ifndef XDFLOW_XDFLOW_HPP_
#define XDFLOW_XDFLOW_HPP_

#include "xdflow/checks.hpp"
#include "xdflow/config.hpp"
#include "xdflow/diagnostics.hpp"
#include "xdflow/errors.hpp"
#include "xdflow/flux.hpp"
#include "xdflow/mesh.hpp"
#include "xdflow/models.hpp"
#include "xdflow/quadrature.hpp"
#include "xdflow/runner.hpp"
#include "xdflow/scheme1d.hpp"
#include "xdflow/scheme2d.hpp"
#include "xdflow/stepping.hpp"

#endif  // XDFLOW_XDFLOW_HPP_
