#pragma once

#include "core.hpp"
#include "polygon.hpp"
#include "domain.hpp"
#include "dyadic.hpp"
#include "whitney.hpp"
#include "probe.hpp"
#include "reflection.hpp"
#include "partition.hpp"
#include "grid.hpp"
#include "calculus.hpp"
#include "affine.hpp"
#include "extension.hpp"
#include "inequality.hpp"
#include "report.hpp"
#include "verify.hpp"
