#pragma once

#include "cg.hpp"
#include "classify.hpp"
#include "error.hpp"
#include "experiments.hpp"
#include "geometry.hpp"
#include "graph.hpp"
#include "io.hpp"
#include "kernels.hpp"
#include "laplacian.hpp"
#include "mnist.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "synthetic.hpp"
#include "validation.hpp"
