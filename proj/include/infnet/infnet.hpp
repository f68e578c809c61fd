#pragma once

#include <infnet/analysis.hpp>
#include <infnet/calibration.hpp>
#include <infnet/dynamics.hpp>
#include <infnet/error.hpp>
#include <infnet/io.hpp>
#include <infnet/jacobi.hpp>
#include <infnet/scenario.hpp>
#include <infnet/simulation.hpp>
#include <infnet/types.hpp>
