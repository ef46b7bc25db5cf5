#pragma once

#include "fjgame/error.hpp"
#include "fjgame/random.hpp"
#include "fjgame/graph.hpp"
#include "fjgame/opinions.hpp"
#include "fjgame/fj.hpp"
#include "fjgame/strategic.hpp"
#include "fjgame/stats.hpp"
#include "fjgame/detection.hpp"
#include "fjgame/recovery.hpp"
#include "fjgame/io.hpp"
#include "fjgame/experiments.hpp"
