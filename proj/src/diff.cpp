#include "rgt/diff.hpp"

#include <algorithm>
#include <map>
#include <regex>

#include "rgt/errors.hpp"

namespace rgt {

namespace {

bool is_section_junk(const std::string& line) {
    static const char* prefixes[] = {"diff ",     "index ",   "new file", "deleted file",
                                     "old mode",  "new mode", "similarity", "rename ",
                                     "copy ",     "Binary files", "Only in"};
    if (line.empty()) return true;
    for (const char* p : prefixes)
        if (starts_with(line, p)) return true;
    return false;
}

/// Strips "a/" or "b/" prefixes and validates the path stays inside the
/// tree. "/dev/null" maps to the empty string.
std::string clean_path(std::string path, std::size_t line_no) {
    const auto tab = path.find('\t');
    if (tab != std::string::npos) path.resize(tab);
    while (!path.empty() && (path.back() == ' ' || path.back() == '\r')) path.pop_back();
    if (path == "/dev/null") return {};
    if (starts_with(path, "a/") || starts_with(path, "b/")) path = path.substr(2);
    if (path.empty())
        throw DiffSyntaxError("empty file path at line " + std::to_string(line_no));
    if (path.front() == '/')
        throw DiffSyntaxError("absolute path in diff: " + path);
    for (const auto& seg : split(path, '/'))
        if (seg == "..")
            throw DiffSyntaxError("path escapes the tree root: " + path);
    return path;
}

long parse_count(const std::string& s) { return s.empty() ? 1 : std::stol(s); }

}  // namespace

FileLines split_lines(const std::string& content) {
    FileLines file;
    if (content.empty()) return file;
    file.final_newline = content.back() == '\n';
    std::size_t begin = 0;
    while (begin < content.size()) {
        std::size_t end = content.find('\n', begin);
        if (end == std::string::npos) {
            file.lines.push_back(content.substr(begin));
            break;
        }
        file.lines.push_back(content.substr(begin, end - begin));
        begin = end + 1;
    }
    return file;
}

std::string join_lines(const FileLines& file) {
    std::string out;
    for (std::size_t i = 0; i < file.lines.size(); ++i) {
        out += file.lines[i];
        if (i + 1 < file.lines.size() || file.final_newline) out += '\n';
    }
    return out;
}

PatchDocument parse_unified_diff(const std::string& text) {
    static const std::regex hunk_re(R"(^@@ -(\d+)(?:,(\d+))? \+(\d+)(?:,(\d+))? @@(.*)$)");

    PatchDocument doc;
    doc.raw_text = text;

    const FileLines body = split_lines(text);
    std::size_t i = 0;
    std::string old_file, new_file;
    bool in_file = false;
    long last_old_end = 0;

    while (i < body.lines.size()) {
        const std::string& line = body.lines[i];

        if (starts_with(line, "--- ")) {
            old_file = clean_path(line.substr(4), i + 1);
            if (i + 1 >= body.lines.size() || !starts_with(body.lines[i + 1], "+++ "))
                throw DiffSyntaxError("missing +++ after --- at line " + std::to_string(i + 1));
            new_file = clean_path(body.lines[i + 1].substr(4), i + 2);
            if (old_file.empty() && new_file.empty())
                throw DiffSyntaxError("both sides are /dev/null at line " + std::to_string(i + 1));
            in_file = true;
            last_old_end = 0;
            i += 2;
            continue;
        }

        std::smatch m;
        if (in_file && std::regex_match(line, m, hunk_re)) {
            Hunk hunk;
            hunk.old_file = old_file;
            hunk.new_file = new_file;
            hunk.old_start = std::stol(m[1]);
            hunk.old_count = parse_count(m[2]);
            hunk.new_start = std::stol(m[3]);
            hunk.new_count = parse_count(m[4]);
            hunk.section = m[5];

            if (hunk.old_start <= last_old_end && !(old_file.empty()))
                throw DiffSyntaxError("hunks out of order or overlapping at line " +
                                      std::to_string(i + 1));

            long need_old = hunk.old_count, need_new = hunk.new_count;
            ++i;
            while (need_old > 0 || need_new > 0) {
                if (i >= body.lines.size())
                    throw DiffSyntaxError("hunk body ends early (declared counts too large)");
                const std::string& b = body.lines[i];
                DiffLine dl;
                if (b.empty()) {
                    dl.op = DiffLine::Op::Context;
                    --need_old;
                    --need_new;
                } else if (b[0] == ' ') {
                    dl.op = DiffLine::Op::Context;
                    dl.text = b.substr(1);
                    --need_old;
                    --need_new;
                } else if (b[0] == '-') {
                    dl.op = DiffLine::Op::Removed;
                    dl.text = b.substr(1);
                    --need_old;
                } else if (b[0] == '+') {
                    dl.op = DiffLine::Op::Added;
                    dl.text = b.substr(1);
                    --need_new;
                } else if (b[0] == '\\') {
                    if (hunk.lines.empty())
                        throw DiffSyntaxError("stray no-newline marker at line " +
                                              std::to_string(i + 1));
                    hunk.lines.back().no_newline = true;
                    ++i;
                    continue;
                } else {
                    throw DiffSyntaxError("hunk body ends early at line " + std::to_string(i + 1) +
                                          " (declared counts too large)");
                }
                if (need_old < 0 || need_new < 0)
                    throw DiffSyntaxError("hunk body exceeds declared counts at line " +
                                          std::to_string(i + 1));
                hunk.lines.push_back(std::move(dl));
                ++i;
            }
            if (i < body.lines.size() && !body.lines[i].empty() && body.lines[i][0] == '\\') {
                if (!hunk.lines.empty()) hunk.lines.back().no_newline = true;
                ++i;
            }
            // A body line immediately continuing with +/-/space means the
            // declared counts were too small.
            if (i < body.lines.size()) {
                const std::string& next = body.lines[i];
                if (!next.empty() && (next[0] == '+' || next[0] == '-') &&
                    !starts_with(next, "--- ") && !starts_with(next, "+++ "))
                    throw DiffSyntaxError("hunk body continues past declared counts at line " +
                                          std::to_string(i + 1));
            }

            if (old_file.empty() && hunk.old_count != 0)
                throw DiffSyntaxError("file-creation hunk removes lines");
            if (new_file.empty() && hunk.new_count != 0)
                throw DiffSyntaxError("file-deletion hunk adds lines");
            last_old_end = hunk.old_start + std::max(hunk.old_count - 1, 0L);
            doc.hunks.push_back(std::move(hunk));
            continue;
        }

        if (is_section_junk(line)) {
            ++i;
            continue;
        }
        throw DiffSyntaxError("unexpected content outside hunks at line " + std::to_string(i + 1) +
                              ": " + line.substr(0, 80));
    }

    if (doc.hunks.empty()) throw EmptyDiffError("diff contains no hunks");
    return doc;
}

namespace {

std::string file_label(const std::string& path, char prefix) {
    if (path.empty()) return "/dev/null";
    return std::string(1, prefix) + "/" + path;
}

std::string render_unified(const PatchDocument& doc) {
    std::string out;
    std::string cur_old = "\0missing", cur_new = "\0missing";
    for (const auto& h : doc.hunks) {
        if (h.old_file != cur_old || h.new_file != cur_new) {
            out += "--- " + file_label(h.old_file, 'a') + "\n";
            out += "+++ " + file_label(h.new_file, 'b') + "\n";
            cur_old = h.old_file;
            cur_new = h.new_file;
        }
        out += "@@ -" + std::to_string(h.old_start) + "," + std::to_string(h.old_count) + " +" +
               std::to_string(h.new_start) + "," + std::to_string(h.new_count) + " @@" +
               h.section + "\n";
        for (const auto& l : h.lines) {
            const char marker = l.op == DiffLine::Op::Context ? ' '
                               : l.op == DiffLine::Op::Removed ? '-'
                                                               : '+';
            out += marker + l.text + "\n";
            if (l.no_newline) out += "\\ No newline at end of file\n";
        }
    }
    return out;
}

}  // namespace

PatchDocument invert(const PatchDocument& doc) {
    PatchDocument inv;
    for (const auto& h : doc.hunks) {
        Hunk r = h;
        std::swap(r.old_file, r.new_file);
        std::swap(r.old_start, r.new_start);
        std::swap(r.old_count, r.new_count);
        for (auto& l : r.lines) {
            if (l.op == DiffLine::Op::Removed)
                l.op = DiffLine::Op::Added;
            else if (l.op == DiffLine::Op::Added)
                l.op = DiffLine::Op::Removed;
        }
        inv.hunks.push_back(std::move(r));
    }
    inv.raw_text = render_unified(inv);
    return inv;
}

namespace {

void apply_to_file(const std::vector<const Hunk*>& hunks, const fs::path& root) {
    const std::string& target = hunks.front()->target_file();
    const bool creation = hunks.front()->old_file.empty();
    const bool deletion = hunks.front()->new_file.empty();
    const fs::path old_path = root / (creation ? target : hunks.front()->old_file);

    FileLines file;
    if (creation) {
        if (fs::exists(root / target))
            throw NotApplicableError("patch creates " + target + " but it already exists");
        if (hunks.size() != 1)
            throw NotApplicableError("multiple creation hunks for " + target);
    } else {
        if (!fs::exists(old_path))
            throw NotApplicableError("patched file missing: " + old_path.string());
        file = split_lines(read_file(old_path));
    }

    long delta = 0;  // net lines added by earlier hunks of this file
    for (const Hunk* hunk : hunks) {
        // 0-count hunks anchor after old_start; others start at old_start.
        long cursor = (hunk->old_count == 0 ? hunk->old_start : hunk->old_start - 1) + delta;
        if (cursor < 0) throw NotApplicableError("hunk start out of range in " + target);

        std::vector<std::string> rebuilt(file.lines.begin(), file.lines.begin() +
                                             std::min<std::size_t>(cursor, file.lines.size()));
        if (static_cast<std::size_t>(cursor) > file.lines.size())
            throw NotApplicableError("hunk start beyond end of " + target);

        std::size_t old_cursor = static_cast<std::size_t>(cursor);
        bool old_side_open_end = false, new_side_open_end = false;
        for (const auto& l : hunk->lines) {
            if (l.op == DiffLine::Op::Context || l.op == DiffLine::Op::Removed) {
                if (old_cursor >= file.lines.size())
                    throw NotApplicableError("hunk runs past end of " + target);
                if (file.lines[old_cursor] != l.text)
                    throw NotApplicableError(
                        "context mismatch in " + target + " at line " +
                        std::to_string(old_cursor + 1) + ": expected \"" + l.text +
                        "\", found \"" + file.lines[old_cursor] + "\"");
                if (l.no_newline) {
                    if (old_cursor + 1 != file.lines.size() || file.final_newline)
                        throw NotApplicableError("no-newline marker mismatch in " + target);
                }
                ++old_cursor;
            }
            if (l.op == DiffLine::Op::Context || l.op == DiffLine::Op::Added) {
                rebuilt.push_back(l.text);
                new_side_open_end = l.no_newline;
            } else if (l.op == DiffLine::Op::Removed && l.no_newline) {
                old_side_open_end = true;
            }
        }
        (void)old_side_open_end;

        rebuilt.insert(rebuilt.end(), file.lines.begin() + static_cast<long>(old_cursor),
                       file.lines.end());
        const bool at_eof = old_cursor == file.lines.size();
        file.lines = std::move(rebuilt);
        if (at_eof) file.final_newline = !new_side_open_end;
        delta += hunk->new_count - hunk->old_count;
    }

    if (deletion) {
        if (!file.lines.empty())
            throw NotApplicableError("deletion hunk leaves content in " + target);
        fs::remove(old_path);
        return;
    }
    if (!creation && hunks.front()->old_file != target) fs::remove(old_path);  // rename
    write_file(root / target, join_lines(file));
}

}  // namespace

void apply_in_place(const PatchDocument& doc, const fs::path& root) {
    // Hunks grouped per target file, in document order.
    std::vector<std::string> order;
    std::map<std::string, std::vector<const Hunk*>> grouped;
    for (const auto& h : doc.hunks) {
        auto& bucket = grouped[h.target_file()];
        if (bucket.empty()) order.push_back(h.target_file());
        bucket.push_back(&h);
    }
    for (const auto& file : order) apply_to_file(grouped[file], root);
}

}  // namespace rgt
