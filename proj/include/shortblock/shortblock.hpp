#pragma once

#include "channel.hpp"
#include "common.hpp"
#include "hadamard.hpp"
#include "phy_frame.hpp"
#include "receivers.hpp"
#include "rm_codes.hpp"
#include "sim.hpp"
