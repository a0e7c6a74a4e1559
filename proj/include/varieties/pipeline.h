#ifndef VARIETIES_PIPELINE_H_
#define VARIETIES_PIPELINE_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "varieties/corpus.h"

namespace varieties {

// Every run parameter. Values come from defaults, then the config file,
// then VARIETIES_* environment variables, then command-line flags.
struct PipelineConfig {
  std::filesystem::path resources;
  std::map<Variety, std::filesystem::path> corpora;
  std::filesystem::path out = "out";
  std::uint64_t seed = 1;
  std::size_t chunk_tokens = 2000;
  std::size_t cv_folds = 10;
  std::size_t bootstrap_iterations = 1000;
  // Unset: the token count of the smallest variety.
  std::optional<std::size_t> metrics_tokens;
  std::vector<std::string> feature_sets = {
      "FW", "POS", "POSTOK", "COH", "FW+POS", "FW+POSTOK", "POS+POSTOK",
      "FW+POS+POSTOK"};
  std::string cluster_features = "FW";
  int lm_order = 5;
  std::size_t lm_train_tokens = 7'000'000;
  std::size_t lm_test_sentences = 5350;
  std::size_t lm_country_sentences = 500;
  std::size_t lm_chunk_sentences = 100;

  // Canonical key/value snapshot, paths as given after resolution.
  std::map<std::string, std::string> snapshot() const;
};

using Environment = std::function<std::optional<std::string>(const std::string&)>;

// Process environment lookup.
std::optional<std::string> process_env(const std::string& name);

// `key = value` lines; `#` starts a comment; `[section]` prefixes the
// following keys with `section.`; values may be double-quoted. Relative
// paths resolve against `base_dir`. Unknown keys and malformed values throw
// ValidationError. Each key `a.b` can be overridden by `VARIETIES_A_B`.
PipelineConfig parse_config(std::istream& in, const std::string& source,
                            const std::filesystem::path& base_dir,
                            const Environment& env);
PipelineConfig load_config(const std::filesystem::path& path,
                           const Environment& env = process_env);

// Throws ValidationError naming the first missing path or nonpositive
// parameter.
void validate_config(const PipelineConfig& config, bool need_corpora);

// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

// Writes `path.tmp` then renames it over `path`.
void write_file_atomic(const std::filesystem::path& path,
                       std::string_view contents);

// Exclusive ownership of an output directory through `<dir>/.lock`.
class OutputLock {
 public:
  // Throws std::runtime_error when the lock is already held.
  explicit OutputLock(const std::filesystem::path& dir);
  ~OutputLock();
  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;

 private:
  std::filesystem::path path_;
};

inline constexpr std::string_view kStages[] = {"ingest", "classify", "cluster",
                                               "metrics", "lm", "report"};

// Runs one stage into `config.out`. Diagnostics go to `log`. Stage files
// are deterministic given the config and inputs, except `timing.json` and
// the top-level `manifest.json`.
void run_stage(std::string_view stage, const PipelineConfig& config,
               std::ostream& log);

// Command-line entry point: subcommands ingest, classify, cluster, metrics,
// lm, report; flags --config, --seed, --out. Returns 0 on success, 1 on a
// validation error, 2 on any other failure.
int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err, const Environment& env = process_env);

}  // namespace varieties

#endif  // VARIETIES_PIPELINE_H_
