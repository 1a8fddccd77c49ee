#include "signdim/io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "signdim/error.hpp"

namespace signdim::io {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

Direction parse_direction(const std::string& raw, std::size_t line_no) {
    const std::string v = lower(trim(raw));
    if (v == "up") return Direction::Up;
    if (v == "down") return Direction::Down;
    throw Error(ErrorKind::ParseError,
                "line " + std::to_string(line_no) + ": vote must be up or down, got '" + raw + "'");
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t k = 0; k < line.size(); ++k) {
        const char ch = line[k];
        if (quoted) {
            if (ch == '"') {
                if (k + 1 < line.size() && line[k + 1] == '"') {
                    field.push_back('"');
                    ++k;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(ch);
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (ch != '\r') {
            field.push_back(ch);
        }
    }
    if (quoted) throw Error(ErrorKind::ParseError, "unterminated quoted field");
    fields.push_back(std::move(field));
    return fields;
}

std::vector<Vote> read_votes_csv(std::istream& in) {
    std::vector<Vote> votes;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto fields = split_csv_line(line);
        if (!header_seen) {
            header_seen = true;
            if (fields.size() != 3 || lower(trim(fields[0])) != "comment_id" ||
                lower(trim(fields[1])) != "voter_id" || lower(trim(fields[2])) != "vote")
                throw Error(ErrorKind::ParseError, "expected header comment_id,voter_id,vote");
            continue;
        }
        if (fields.size() != 3)
            throw Error(ErrorKind::ParseError,
                        "line " + std::to_string(line_no) + ": expected 3 fields");
        votes.push_back({trim(fields[0]), trim(fields[1]), parse_direction(fields[2], line_no)});
    }
    return votes;
}

std::vector<Vote> read_votes_json(std::istream& in) {
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::ParseError, e.what());
    }
    if (!doc.is_array()) throw Error(ErrorKind::ParseError, "expected a JSON array of votes");
    std::vector<Vote> votes;
    votes.reserve(doc.size());
    std::size_t k = 0;
    for (const auto& rec : doc) {
        ++k;
        try {
            votes.push_back({rec.at("comment_id").get<std::string>(),
                             rec.at("voter_id").get<std::string>(),
                             parse_direction(rec.at("vote").get<std::string>(), k)});
        } catch (const json::exception& e) {
            throw Error(ErrorKind::ParseError, "record " + std::to_string(k) + ": " + e.what());
        }
    }
    return votes;
}

std::vector<Vote> load_votes(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
    if (lower(path.extension().string()) == ".json") return read_votes_json(in);
    if (lower(path.extension().string()) == ".csv") return read_votes_csv(in);
    char first = 0;
    while (in.get(first) && std::isspace(static_cast<unsigned char>(first))) {
    }
    in.clear();
    in.seekg(0);
    return first == '[' ? read_votes_json(in) : read_votes_csv(in);
}

void write_votes_csv(std::ostream& out, const PartialSignMatrix& m) {
    out << "comment_id,voter_id,vote\n";
    for (const Entry& e : m.entries())
        out << m.row_labels()[e.row] << ',' << m.col_labels()[e.col] << ','
            << (e.sign == Sign::Up ? "up" : "down") << '\n';
}

json matrix_to_json(const PartialSignMatrix& m) {
    json entries = json::array();
    for (const Entry& e : m.entries()) entries.push_back({e.row, e.col, to_int(e.sign)});
    return json{{"n_comments", m.n_rows()},
                {"n_voters", m.n_cols()},
                {"row_labels", m.row_labels()},
                {"col_labels", m.col_labels()},
                {"entries", std::move(entries)}};
}

PartialSignMatrix matrix_from_json(const json& j) {
    try {
        std::vector<Entry> entries;
        for (const auto& e : j.at("entries")) {
            const int s = e.at(2).get<int>();
            if (s != 1 && s != -1) throw Error(ErrorKind::ParseError, "entry sign must be +1 or -1");
            entries.push_back({e.at(0).get<std::size_t>(), e.at(1).get<std::size_t>(),
                               s > 0 ? Sign::Up : Sign::Down});
        }
        return PartialSignMatrix(j.at("n_comments").get<std::size_t>(),
                                 j.at("n_voters").get<std::size_t>(), std::move(entries),
                                 j.at("row_labels").get<std::vector<std::string>>(),
                                 j.at("col_labels").get<std::vector<std::string>>());
    } catch (const json::exception& e) {
        throw Error(ErrorKind::ParseError, e.what());
    }
}

std::map<std::string, std::string> read_comment_texts(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
    std::map<std::string, std::string> texts;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        auto fields = split_csv_line(line);
        if (!header_seen) {
            header_seen = true;
            if (fields.size() < 2 || lower(trim(fields[0])) != "comment_id")
                throw Error(ErrorKind::ParseError, "expected header comment_id,text");
            continue;
        }
        if (fields.size() != 2) throw Error(ErrorKind::ParseError, "expected 2 fields: " + line);
        texts[trim(fields[0])] = fields[1];
    }
    return texts;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
    out << contents;
}

}  // namespace signdim::io
