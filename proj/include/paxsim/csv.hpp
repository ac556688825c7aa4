#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "paxsim/errors.hpp"
#include "paxsim/time.hpp"

namespace paxsim {

inline std::string fmt_fixed(double v, int decimals) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(decimals) << v;
    return out.str();
}

inline std::string fmt_seconds(SimTime t, int decimals = 6) {
    return fmt_fixed(to_seconds(t), decimals);
}

inline void write_text_file(const std::filesystem::path& p, const std::string& body) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw SimError("cannot write " + p.string());
    out << body;
    if (!out) throw SimError("short write to " + p.string());
}

}  // namespace paxsim
