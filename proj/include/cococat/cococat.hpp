#pragma once

#include "cococat/config.hpp"
#include "cococat/errors.hpp"
#include "cococat/intensity.hpp"
#include "cococat/longstaff.hpp"
#include "cococat/loss.hpp"
#include "cococat/oracle.hpp"
#include "cococat/pricing.hpp"
#include "cococat/quadrature.hpp"
#include "cococat/random.hpp"
#include "cococat/severity.hpp"
#include "cococat/sweep.hpp"
