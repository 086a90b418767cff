#ifndef RATBARY_RATBARY_HPP
#define RATBARY_RATBARY_HPP

#include "ratbary/error.hpp"
#include "ratbary/linalg.hpp"
#include "ratbary/grid.hpp"
#include "ratbary/barycentric.hpp"
#include "ratbary/loewner.hpp"
#include "ratbary/aaa.hpp"
#include "ratbary/qr_aaa.hpp"
#include "ratbary/rng.hpp"
#include "ratbary/extension.hpp"
#include "ratbary/pqr_aaa.hpp"
#include "ratbary/problems.hpp"
#include "ratbary/verify.hpp"
#include "ratbary/io.hpp"
#include "ratbary/commands.hpp"

#endif
