#include "vstab/numeric.hpp"

#include <cstdio>

namespace vstab {

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace vstab
