#include "lindex/report.hpp"

namespace lindex {

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::pass: return "pass";
        case Verdict::fail: return "fail";
        case Verdict::indeterminate: return "indeterminate";
    }
    return "indeterminate";
}

Verdict verdict_from(bool ok, std::size_t used, std::size_t skipped) {
    const std::size_t total = used + skipped;
    if (total == 0) return Verdict::indeterminate;
    if (!ok && used > 0) return Verdict::fail;
    if (static_cast<double>(skipped) > kSkipFraction * static_cast<double>(total)) return Verdict::indeterminate;
    return ok ? Verdict::pass : Verdict::fail;
}

}  // namespace lindex
