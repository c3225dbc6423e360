#include "doctest.h"

#include "gsd/arap.hpp"
#include "gsd/compositor.hpp"
#include "gsd/config.hpp"
#include "gsd/deform_graph.hpp"

TEST_CASE("documented defaults") {
  CHECK(gsd::defaults::kControlCount == 512);
  CHECK(gsd::defaults::kGraphNeighbors == 8);
  CHECK(gsd::defaults::kSkinNeighbors == 3);
  CHECK(gsd::defaults::kSolverIterations == 3);
  CHECK(gsd::defaults::kBoundaryThreshold == 0.5);
  CHECK(gsd::defaults::kBoundaryRadius == 8);
}

TEST_CASE("option structs start from the defaults") {
  const gsd::GraphOptions opts;
  CHECK(opts.control_count == 512);
  CHECK(opts.neighbors == 8);
  CHECK(opts.weighting == gsd::EdgeWeighting::Uniform);
}
