#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "signdim/sign_matrix.hpp"

namespace signdim::io {

using nlohmann::json;

/// CSV with header `comment_id,voter_id,vote`; vote is up/down, any case.
std::vector<Vote> read_votes_csv(std::istream& in);
/// JSON array of {comment_id, voter_id, vote}.
std::vector<Vote> read_votes_json(std::istream& in);
/// Dispatches on extension (.json) or, failing that, on the first character.
std::vector<Vote> load_votes(const std::filesystem::path& path);

void write_votes_csv(std::ostream& out, const PartialSignMatrix& m);

/// {n_comments, n_voters, row_labels, col_labels, entries:[[i,j,s],...]}.
json matrix_to_json(const PartialSignMatrix& m);
PartialSignMatrix matrix_from_json(const json& j);

/// Sidecar CSV `comment_id,text`. Keys are comment ids.
std::map<std::string, std::string> read_comment_texts(const std::filesystem::path& path);

/// Splits one CSV record, honouring double-quoted fields with "" escapes.
std::vector<std::string> split_csv_line(const std::string& line);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace signdim::io
