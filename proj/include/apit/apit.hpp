#pragma once

#include "apit/apit_test.hpp"
#include "apit/baselines.hpp"
#include "apit/circular.hpp"
#include "apit/data_file.hpp"
#include "apit/errors.hpp"
#include "apit/harness.hpp"
#include "apit/io_json.hpp"
#include "apit/models.hpp"
#include "apit/nnts.hpp"
#include "apit/parallel.hpp"
#include "apit/random.hpp"
#include "apit/special.hpp"
#include "apit/uniformity.hpp"
#include "apit/version.hpp"
