#include "advtrade/types.hpp"

#include <cstdio>
#include <cstdlib>
#include <ostream>

namespace advtrade {

const char* to_string(Side s) { return s == Side::Bid ? "bid" : "offer"; }

std::string Price::str() const {
    const std::int64_t whole = ticks_ / kScale;
    const std::int64_t frac = std::llabs(ticks_ % kScale);
    char buf[48];
    const char* sign = (ticks_ < 0 && whole == 0) ? "-" : "";
    std::snprintf(buf, sizeof(buf), "%s%lld.%04lld", sign, static_cast<long long>(whole), static_cast<long long>(frac));
    return buf;
}

std::ostream& operator<<(std::ostream& os, Price p) { return os << p.str(); }

} // namespace advtrade
