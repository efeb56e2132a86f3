#pragma once

#include "rgt/util.hpp"

namespace rgt {

/// Campaign time cost, split the way the pipeline spends it: test
/// generation, sanity checking, and test execution over patches (split by
/// final verdict).
struct TimeBreakdown {
    Millis tcgen{0};
    Millis sc{0};
    Millis exec_correct{0};
    Millis exec_overfitting{0};

    Millis total() const { return tcgen + sc + exec_correct + exec_overfitting; }
};

}  // namespace rgt
