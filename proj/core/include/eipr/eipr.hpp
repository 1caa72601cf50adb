#pragma once

#include "eipr/baseline_gd.hpp"
#include "eipr/dataset_archive.hpp"
#include "eipr/errors.hpp"
#include "eipr/export.hpp"
#include "eipr/group_actions.hpp"
#include "eipr/idx.hpp"
#include "eipr/losses.hpp"
#include "eipr/metrics.hpp"
#include "eipr/reconstructor.hpp"
#include "eipr/report.hpp"
#include "eipr/sensing.hpp"
#include "eipr/sweep.hpp"
#include "eipr/train_config.hpp"
#include "eipr/training.hpp"
#include "eipr/types.hpp"
