#pragma once

#include "secrelay/allocation.hpp"
#include "secrelay/channel.hpp"
#include "secrelay/config.hpp"
#include "secrelay/dual_optimizer.hpp"
#include "secrelay/error.hpp"
#include "secrelay/experiment.hpp"
#include "secrelay/schemes.hpp"
#include "secrelay/secrecy.hpp"
