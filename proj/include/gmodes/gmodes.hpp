#pragma once

#include <gmodes/io.hpp>
#include <gmodes/lab.hpp>
#include <gmodes/mixture.hpp>
#include <gmodes/modes.hpp>
#include <gmodes/numerics.hpp>
#include <gmodes/theta.hpp>
