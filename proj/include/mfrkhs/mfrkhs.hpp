#pragma once

#include "mfrkhs/dataset.hpp"
#include "mfrkhs/errors.hpp"
#include "mfrkhs/funcspace.hpp"
#include "mfrkhs/kernels.hpp"
#include "mfrkhs/model.hpp"
#include "mfrkhs/solver.hpp"
