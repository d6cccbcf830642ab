#include "slsm/value.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>

namespace slsm {

std::string value_to_string(const Value& v) {
    switch (v.index()) {
        case 0:
            return std::to_string(std::get<int64_t>(v));
        case 1: {
            const Dec d = std::get<Dec>(v);
            const int64_t whole = d.cents / 100;
            int64_t frac = d.cents % 100;
            if (frac < 0) frac = -frac;
            char buf[40];
            if (d.cents < 0 && whole == 0) {
                std::snprintf(buf, sizeof(buf), "-0.%02lld", static_cast<long long>(frac));
            } else {
                std::snprintf(buf, sizeof(buf), "%lld.%02lld", static_cast<long long>(whole),
                              static_cast<long long>(frac));
            }
            return buf;
        }
        default:
            return std::get<std::string>(v);
    }
}

Value value_from_string(ColType type, const std::string& s) {
    switch (type) {
        case ColType::Int: {
            int64_t out = 0;
            auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
            if (ec != std::errc{} || p != s.data() + s.size()) {
                throw EncodingError("bad integer literal: " + s);
            }
            return out;
        }
        case ColType::Dec: {
            // accepts "123", "123.4", "123.45", "-0.05"
            bool neg = !s.empty() && s[0] == '-';
            std::string body = neg ? s.substr(1) : s;
            auto dot = body.find('.');
            std::string whole = dot == std::string::npos ? body : body.substr(0, dot);
            std::string frac = dot == std::string::npos ? "" : body.substr(dot + 1);
            if (frac.size() > 2) frac = frac.substr(0, 2);
            while (frac.size() < 2) frac.push_back('0');
            if (whole.empty()) whole = "0";
            int64_t w = 0, f = 0;
            auto [p1, e1] = std::from_chars(whole.data(), whole.data() + whole.size(), w);
            auto [p2, e2] = std::from_chars(frac.data(), frac.data() + frac.size(), f);
            if (e1 != std::errc{} || e2 != std::errc{} || p1 != whole.data() + whole.size() ||
                p2 != frac.data() + frac.size()) {
                throw EncodingError("bad decimal literal: " + s);
            }
            int64_t cents = w * 100 + f;
            return Dec{neg ? -cents : cents};
        }
        default:
            return s;
    }
}

}  // namespace slsm
