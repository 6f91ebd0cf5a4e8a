#pragma once

#include "dataio.hpp"

#include <atomic>
#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

namespace fixture {

namespace fs = std::filesystem;
using recoverbench::EpochDataset;
using recoverbench::Label;

// Dataset with `n_a` A trials followed by `n_b` B trials; value(trial, channel, sample).
inline EpochDataset make_dataset(std::size_t n_a, std::size_t n_b, std::size_t n_channels, std::size_t n_time,
                                 const std::function<double(std::size_t, std::size_t, std::size_t)>& value,
                                 double sampling_rate = 1000.0) {
    EpochDataset d;
    d.n_trials = n_a + n_b;
    d.n_channels = n_channels;
    d.n_time = n_time;
    d.sampling_rate = sampling_rate;
    d.data.resize(d.n_trials * n_channels * n_time);
    for (std::size_t i = 0; i < d.n_trials; ++i) {
        d.labels.push_back(i < n_a ? Label::A : Label::B);
        for (std::size_t c = 0; c < n_channels; ++c)
            for (std::size_t t = 0; t < n_time; ++t) d.trace(i, c)[t] = value(i, c, t);
    }
    for (std::size_t c = 0; c < n_channels; ++c) d.channel_ids.push_back("ch" + std::to_string(c + 1));
    d.time_offsets_ms = recoverbench::uniform_time_axis(n_time, sampling_rate, 0.0);
    return d;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path_ = fs::temp_directory_path() /
                ("rbtest_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

inline std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

inline void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << text;
}

// Minimal well-formedness check: balanced tags, quoted attributes, known
// entities, a single root element.
inline bool xml_well_formed_builtin(const std::string& s, std::string* why = nullptr) {
    auto bad = [&](const std::string& w) {
        if (why) *why = w;
        return false;
    };
    std::vector<std::string> stack;
    std::size_t i = 0, roots = 0;
    auto name_char = [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == ':' || c == '.';
    };
    while (i < s.size()) {
        if (s[i] == '<') {
            if (s.compare(i, 4, "<!--") == 0) {
                const auto e = s.find("-->", i + 4);
                if (e == std::string::npos) return bad("unterminated comment");
                i = e + 3;
                continue;
            }
            if (s.compare(i, 2, "<?") == 0) {
                const auto e = s.find("?>", i + 2);
                if (e == std::string::npos) return bad("unterminated declaration");
                i = e + 2;
                continue;
            }
            const bool closing = i + 1 < s.size() && s[i + 1] == '/';
            std::size_t j = i + (closing ? 2 : 1);
            const std::size_t name_start = j;
            while (j < s.size() && name_char(s[j])) ++j;
            const std::string name = s.substr(name_start, j - name_start);
            if (name.empty()) return bad("empty tag name at " + std::to_string(i));
            if (closing) {
                while (j < s.size() && std::isspace(static_cast<unsigned char>(s[j]))) ++j;
                if (j >= s.size() || s[j] != '>') return bad("malformed closing tag " + name);
                if (stack.empty() || stack.back() != name) return bad("mismatched </" + name + ">");
                stack.pop_back();
                i = j + 1;
                continue;
            }
            // attributes
            bool self_close = false;
            while (true) {
                while (j < s.size() && std::isspace(static_cast<unsigned char>(s[j]))) ++j;
                if (j >= s.size()) return bad("unterminated tag " + name);
                if (s[j] == '>') break;
                if (s.compare(j, 2, "/>") == 0) {
                    self_close = true;
                    ++j;
                    break;
                }
                const std::size_t a0 = j;
                while (j < s.size() && name_char(s[j])) ++j;
                if (j == a0) return bad("bad attribute in " + name);
                if (j >= s.size() || s[j] != '=') return bad("attribute without value in " + name);
                ++j;
                if (j >= s.size() || (s[j] != '"' && s[j] != '\'')) return bad("unquoted attribute in " + name);
                const char q = s[j];
                const auto e = s.find(q, j + 1);
                if (e == std::string::npos) return bad("unterminated attribute in " + name);
                if (s.substr(j + 1, e - j - 1).find('<') != std::string::npos) return bad("'<' in attribute");
                j = e + 1;
            }
            if (stack.empty()) ++roots;
            if (!self_close) stack.push_back(name);
            i = j + 1;
            continue;
        }
        if (s[i] == '&') {
            const auto e = s.find(';', i);
            if (e == std::string::npos) return bad("unterminated entity");
            const std::string ent = s.substr(i + 1, e - i - 1);
            if (ent != "amp" && ent != "lt" && ent != "gt" && ent != "quot" && ent != "apos" && ent.rfind('#', 0) != 0)
                return bad("unknown entity &" + ent + ";");
            i = e + 1;
            continue;
        }
        if (stack.empty() && !std::isspace(static_cast<unsigned char>(s[i]))) return bad("text outside root");
        ++i;
    }
    if (!stack.empty()) return bad("unclosed <" + stack.back() + ">");
    if (roots != 1) return bad("expected exactly one root element");
    return true;
}

// Parses with Python's XML parser when an interpreter was found at configure time.
inline bool xml_well_formed_python(const fs::path& file) {
#ifdef RB_PYTHON
    const std::string cmd = std::string(RB_PYTHON) + " -c \"import sys, xml.etree.ElementTree as E; E.parse(sys.argv[1])\" '" +
                            file.string() + "' 2>/dev/null";
    return std::system(cmd.c_str()) == 0;
#else
    (void)file;
    return true;
#endif
}

inline bool xml_well_formed(const fs::path& file, std::string* why = nullptr) {
    if (!xml_well_formed_builtin(read_file(file), why)) return false;
    if (!xml_well_formed_python(file)) {
        if (why) *why = "python xml parser rejected the file";
        return false;
    }
    return true;
}

} // namespace fixture
