#pragma once

#include "disent/errors.hpp"
#include "disent/io.hpp"
#include "disent/qstate.hpp"
#include "disent/ree.hpp"
#include "disent/rng.hpp"
#include "disent/separability.hpp"
#include "disent/structures.hpp"
