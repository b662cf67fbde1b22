#include "lindex/parallel.hpp"

namespace lindex {

namespace {
std::atomic<int> g_jobs{1};
}

int worker_count() { return g_jobs.load(); }

void set_worker_count(int jobs) { g_jobs.store(jobs < 1 ? 1 : jobs); }

}  // namespace lindex
