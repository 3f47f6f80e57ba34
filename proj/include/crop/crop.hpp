#pragma once

#include "crop/allocation.hpp"
#include "crop/env.hpp"
#include "crop/errors.hpp"
#include "crop/hypothesis.hpp"
#include "crop/instances.hpp"
#include "crop/io.hpp"
#include "crop/lp.hpp"
#include "crop/lp_oracle.hpp"
#include "crop/policies.hpp"
#include "crop/rng.hpp"
