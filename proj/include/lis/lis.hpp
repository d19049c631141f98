#pragma once

#include "lis/config.hpp"
#include "lis/costmodel.hpp"
#include "lis/equalizers.hpp"
#include "lis/errors.hpp"
#include "lis/geometry.hpp"
#include "lis/harness.hpp"
#include "lis/hermitian.hpp"
#include "lis/matrix.hpp"
#include "lis/pipeline.hpp"
#include "lis/random.hpp"
#include "lis/svd.hpp"
