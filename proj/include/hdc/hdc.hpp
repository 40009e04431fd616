#pragma once

#include "hdc/codebook.hpp"
#include "hdc/dataset.hpp"
#include "hdc/encoding.hpp"
#include "hdc/error.hpp"
#include "hdc/evaluation.hpp"
#include "hdc/hypervector.hpp"
#include "hdc/io.hpp"
#include "hdc/model.hpp"
#include "hdc/parallel.hpp"
#include "hdc/pipeline.hpp"
#include "hdc/random.hpp"
