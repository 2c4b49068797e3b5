// Streams a generated 10^6-record tweet file and checks that peak resident
// memory does not grow with the record count.
#include <sys/resource.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "stancepipe/corpus.hpp"

namespace fs = std::filesystem;

static long peak_kb() {
  rusage r{};
  getrusage(RUSAGE_SELF, &r);
  return r.ru_maxrss;
}

static void generate(const fs::path& p, std::size_t n) {
  std::ofstream out(p);
  for (std::size_t i = 0; i < n; ++i)
    out << R"({"id":"t)" << i << R"(","user_id":"u)" << i % 5000
        << R"(","created_at":"2017-09-10T10:00:00Z","text":"some text about the referendum #yes","hashtags":["yes"],"lat":41.1,"lon":2.1})"
        << '\n';
}

static std::size_t stream(const fs::path& p) {
  stancepipe::TweetReader reader(p);
  std::size_t n = 0;
  while (auto t = reader.next()) n += !t->text.empty();
  return n;
}

int main() {
  const fs::path dir = fs::temp_directory_path() / ("stancepipe_stream_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  generate(dir / "small.jsonl", 100000);
  generate(dir / "large.jsonl", 1000000);
  const auto large_mb = static_cast<double>(fs::file_size(dir / "large.jsonl")) / (1 << 20);

  const std::size_t small = stream(dir / "small.jsonl");
  const long after_small = peak_kb();
  const std::size_t large = stream(dir / "large.jsonl");
  const long after_large = peak_kb();
  fs::remove_all(dir);

  const double growth_mb = static_cast<double>(after_large - after_small) / 1024.0;
  std::printf("records %zu / %zu, file %.1f MiB, peak RSS %.1f -> %.1f MiB (growth %.2f MiB)\n", small, large,
              large_mb, after_small / 1024.0, after_large / 1024.0, growth_mb);
  const bool ok = small == 100000 && large == 1000000 && growth_mb < 4.0;
  std::printf("%s\n", ok ? "PASS streaming memory bounded" : "FAIL streaming memory bounded");
  return ok ? 0 : 1;
}
