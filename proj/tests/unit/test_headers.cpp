// Every public header must compile on its own and together.
#include "gridseer/common/dense.hpp"
#include "gridseer/common/error.hpp"
#include "gridseer/common/fileio.hpp"
#include "gridseer/common/hash.hpp"
#include "gridseer/common/parallel.hpp"
#include "gridseer/common/rng.hpp"
#include "gridseer/dispatch/io.hpp"
#include "gridseer/dispatch/scenario.hpp"
#include "gridseer/dispatch/surrogate.hpp"
#include "gridseer/faultsim/dataset.hpp"
#include "gridseer/faultsim/fault.hpp"
#include "gridseer/faultsim/sequence.hpp"
#include "gridseer/faultsim/trace.hpp"
#include "gridseer/grid/default_grid.hpp"
#include "gridseer/grid/io.hpp"
#include "gridseer/grid/model.hpp"
#include "gridseer/gridml/congestion.hpp"
#include "gridseer/gridml/fault_models.hpp"
#include "gridseer/gridml/metrics.hpp"
#include "gridseer/gridml/monitor.hpp"
#include "gridseer/gridml/sequence.hpp"
#include "gridseer/gridml/solar.hpp"
#include "gridseer/gridml/split.hpp"
#include "gridseer/gridml/weather.hpp"
#include "gridseer/nn/adam.hpp"
#include "gridseer/nn/dense.hpp"
#include "gridseer/nn/loss.hpp"
#include "gridseer/nn/lstm.hpp"
#include "gridseer/nn/mlp.hpp"
#include "gridseer/nn/model.hpp"
#include "gridseer/nn/standardize.hpp"
#include "gridseer/nn/svm.hpp"
#include "gridseer/nn/tensor.hpp"
#include "gridseer/powerflow/congestion.hpp"
#include "gridseer/powerflow/newton.hpp"
#include "gridseer/powerflow/ybus.hpp"

#include <gtest/gtest.h>

#include <type_traits>

using namespace gridseer;

TEST(Headers, ErrorsShareOneBase) {
    static_assert(std::is_base_of_v<Error, ParseError>);
    static_assert(std::is_base_of_v<Error, NonConvergence>);
    static_assert(std::is_base_of_v<Error, TooManyGenerators>);
    const ShapeMismatch e("bad");
    EXPECT_EQ(e.code(), "ShapeMismatch");
    EXPECT_NE(std::string(e.what()).find("bad"), std::string::npos);
}

TEST(Headers, NonConvergenceCarriesDiagnostics) {
    const NonConvergence e("stuck", 0.25, 20);
    EXPECT_DOUBLE_EQ(e.last_mismatch(), 0.25);
    EXPECT_EQ(e.iterations(), 20);
}
