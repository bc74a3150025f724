#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "faultloc/datasplit.hpp"
#include "faultloc/rng.hpp"

namespace faultloc {

/// token -> synonyms. Synonyms are non-empty [a-z0-9]+ tokens distinct from the key.
class Thesaurus {
 public:
  Thesaurus() = default;
  /// Throws kConfig if an entry violates the invariants.
  explicit Thesaurus(std::map<std::string, std::vector<std::string>> entries);

  /// Small embedded technical-English default.
  static Thesaurus defaults();

  const std::vector<std::string>* synonyms(const std::string& token) const;
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  const std::map<std::string, std::vector<std::string>>& entries() const { return entries_; }

 private:
  std::map<std::string, std::vector<std::string>> entries_;
};

/// Lines of the form `token: syn1, syn2`; '#' starts a comment line.
Thesaurus parse_thesaurus(std::string_view text);
Thesaurus load_thesaurus(const std::filesystem::path& path);

enum class AugmentTechnique { kSynonymReplacement, kRandomSwap };
enum class AugmentScope { kFull, kTargeted };

struct AugmentPlan {
  AugmentTechnique technique = AugmentTechnique::kSynonymReplacement;
  AugmentScope scope = AugmentScope::kFull;
  std::size_t target_threshold = 25;
  std::size_t factor = 1;
  double edit_rate = 0.1;
  std::uint64_t seed = 42;

  void validate() const;
};

std::string_view to_string(AugmentTechnique technique);
std::string_view to_string(AugmentScope scope);
AugmentTechnique parse_technique(std::string_view text);
AugmentScope parse_scope(std::string_view text);

struct EditResult {
  std::vector<std::string> tokens;
  std::size_t edits = 0;
  bool flagged = false;  // nothing could be edited
};

/// max(1, ceil(edit_rate * token_count)).
std::size_t edit_count(double edit_rate, std::size_t token_count);

EditResult synonym_replace(const std::vector<std::string>& tokens, const Thesaurus& thesaurus,
                           double edit_rate, Rng& rng);

EditResult random_swap(const std::vector<std::string>& tokens, double edit_rate, Rng& rng);

struct AugmentedSet {
  std::vector<ProcessedReport> reports;  // originals first, then copies
  std::size_t source_examples = 0;       // examples that spawned copies
  std::size_t flagged_copies = 0;        // copies identical to their source
};

/// Counts label occurrences over the training partition.
std::map<std::string, std::size_t> training_label_counts(const TrainingSet& train);

/// Copies keep their source's labels and get the id "<id>#aug<n>".
/// Targeted scope augments examples with any label counted below the threshold.
AugmentedSet augment_training_set(const TrainingSet& train, const AugmentPlan& plan,
                                  const std::map<std::string, std::size_t>& label_counts,
                                  const Thesaurus& thesaurus);

struct TrainingVariant {
  std::string name;  // original, sr_full, rs_full, sr_targeted, rs_targeted
  TrainingSet train;
  LabelSpace label_space;
};

/// The five training variants: the original plus every technique x scope pair.
/// The label space is refitted per variant and checked against the original.
std::vector<TrainingVariant> make_training_variants(const TrainingSet& train,
                                                    const AugmentPlan& base,
                                                    const Thesaurus& thesaurus);

std::string variant_name(AugmentTechnique technique, AugmentScope scope);

}  // namespace faultloc
