#pragma once

#include "parnet/classify.hpp"
#include "parnet/corpus.hpp"
#include "parnet/corpus_io.hpp"
#include "parnet/experiment.hpp"
#include "parnet/graph.hpp"
#include "parnet/graph_io.hpp"
#include "parnet/netbuild.hpp"
#include "parnet/netmeasure.hpp"
#include "parnet/pipeline.hpp"
