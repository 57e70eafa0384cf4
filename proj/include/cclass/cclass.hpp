#pragma once

#include "cclass/bayesnet.hpp"
#include "cclass/classify.hpp"
#include "cclass/dataset.hpp"
#include "cclass/discovery.hpp"
#include "cclass/error.hpp"
#include "cclass/eval.hpp"
#include "cclass/graph.hpp"
#include "cclass/io.hpp"
#include "cclass/random.hpp"
#include "cclass/special.hpp"
#include "cclass/stats.hpp"
#include "cclass/synth.hpp"
