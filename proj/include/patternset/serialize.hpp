#ifndef PATTERNSET_SERIALIZE_HPP
#define PATTERNSET_SERIALIZE_HPP

#include <string>

#include "patternset/witness.hpp"

namespace patternset {

// JSON text forms. Deterministic: fixed key order, rationals as "p/q",
// dyadics as "m*2^e", intervals as two-element arrays. Round trips are
// exact. Malformed input throws ConfigError.

std::string delta_sequence_to_json(const DeltaSequence& seq);
DeltaSequence delta_sequence_from_json(const std::string& text);

std::string certificate_to_json(const WitnessCertificate& cert);
WitnessCertificate certificate_from_json(const std::string& text);

// CSV with header "n,M,bound_exact_num,bound_exact_den,paper_bound"; an
// uncertified level keeps its n and M and carries "uncertified" in the
// last column.
std::string cover_to_csv(const CoverCertificate& cover);

// Writes via a temporary file in the same directory plus rename, so a
// crash never leaves a half-written output.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace patternset

#endif  // PATTERNSET_SERIALIZE_HPP
