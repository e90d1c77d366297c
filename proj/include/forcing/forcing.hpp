#pragma once

#include "forcing/formula.hpp"
#include "forcing/syntax.hpp"
#include "forcing/tree.hpp"
#include "forcing/rules.hpp"
#include "forcing/marking.hpp"
#include "forcing/model.hpp"
#include "forcing/decide.hpp"
#include "forcing/render.hpp"
#include "forcing/generate.hpp"
#include "forcing/corpus.hpp"
