#pragma once
#include <groupsparse/core.hpp>
#include <groupsparse/objectives.hpp>
#include <groupsparse/solvers.hpp>
#include <groupsparse/selection.hpp>
#include <groupsparse/css.hpp>
#include <groupsparse/io.hpp>
#include <groupsparse/instance.hpp>
#include <groupsparse/verify.hpp>
