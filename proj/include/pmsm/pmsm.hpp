/**
 * @file pmsm.hpp
 * @brief Umbrella header.
 */
#pragma once

#include "core.hpp"
#include "parallel.hpp"
#include "neighbor.hpp"
#include "potentials.hpp"
#include "msm.hpp"
#include "forcefield.hpp"
#include "integrate.hpp"
#include "parareal.hpp"
#include "costmodel.hpp"
#include "generate.hpp"
#include "io.hpp"
#include "cli.hpp"
