#pragma once

#include "gestime/baseline.hpp"
#include "gestime/config.hpp"
#include "gestime/corpus.hpp"
#include "gestime/dataset_io.hpp"
#include "gestime/error.hpp"
#include "gestime/experiments.hpp"
#include "gestime/features.hpp"
#include "gestime/gesture_class.hpp"
#include "gestime/ingest.hpp"
#include "gestime/keyvalue.hpp"
#include "gestime/nnet/adam.hpp"
#include "gestime/nnet/checkpoint.hpp"
#include "gestime/nnet/model.hpp"
#include "gestime/nnet/params.hpp"
#include "gestime/nnet/train.hpp"
#include "gestime/report.hpp"
#include "gestime/rng.hpp"
#include "gestime/seqmetric.hpp"
#include "gestime/synthetic.hpp"
#include "gestime/table_io.hpp"
