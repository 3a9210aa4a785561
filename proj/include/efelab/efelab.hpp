#pragma once

#include "efelab/commands.hpp"
#include "efelab/envs.hpp"
#include "efelab/errors.hpp"
#include "efelab/functionals.hpp"
#include "efelab/inference.hpp"
#include "efelab/model.hpp"
#include "efelab/model_io.hpp"
#include "efelab/oracle.hpp"
#include "efelab/planning.hpp"
#include "efelab/probability.hpp"
#include "efelab/random.hpp"
#include "efelab/report_io.hpp"
