#pragma once

#include "billiard/common.hpp"
#include "billiard/config.hpp"
#include "billiard/csv.hpp"
#include "billiard/domain.hpp"
#include "billiard/oned.hpp"
#include "billiard/oracle.hpp"
#include "billiard/pantograph.hpp"
#include "billiard/perturbation.hpp"
#include "billiard/specfun.hpp"
