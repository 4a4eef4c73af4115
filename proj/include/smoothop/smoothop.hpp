#pragma once

#include "smoothop/advantage.hpp"
#include "smoothop/analysis.hpp"
#include "smoothop/checks.hpp"
#include "smoothop/config.hpp"
#include "smoothop/envs.hpp"
#include "smoothop/errors.hpp"
#include "smoothop/experiments.hpp"
#include "smoothop/random.hpp"
#include "smoothop/snra.hpp"
#include "smoothop/trainer.hpp"
#include "smoothop/verifiers.hpp"
