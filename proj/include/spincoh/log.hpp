#pragma once

#include <functional>
#include <iostream>
#include <string>

namespace spincoh {

// Non-fatal diagnostics (e.g. delta-approximation used below its validity
// cutoff) go through a process-wide sink so library code never writes to
// stderr behind the caller's back.
using WarnSink = std::function<void(const std::string&)>;

inline WarnSink& warn_sink() {
    static WarnSink sink = [](const std::string& msg) {
        std::cerr << "[spincoh] warning: " << msg << "\n";
    };
    return sink;
}

inline void set_warn_sink(WarnSink sink) { warn_sink() = std::move(sink); }

inline void warn(const std::string& msg) {
    if (warn_sink()) warn_sink()(msg);
}

}  // namespace spincoh
