#pragma once

#include "kgattr/commands.hpp"
#include "kgattr/config.hpp"
#include "kgattr/error.hpp"
#include "kgattr/extraction.hpp"
#include "kgattr/graphstore.hpp"
#include "kgattr/model_client.hpp"
#include "kgattr/ontology.hpp"
#include "kgattr/report.hpp"
#include "kgattr/similarity.hpp"
#include "kgattr/styletrace.hpp"
#include "kgattr/text.hpp"
#include "kgattr/unlearn.hpp"
