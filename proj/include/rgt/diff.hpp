#pragma once

#include <string>
#include <vector>

#include "rgt/util.hpp"

namespace rgt {

/// One line of a hunk body.
struct DiffLine {
    enum class Op { Context, Removed, Added };
    Op op = Op::Context;
    std::string text;  // without the leading marker or trailing newline
    // Set by a "\ No newline at end of file" marker on the following line;
    // only meaningful when this is the final line of its side.
    bool no_newline = false;
};

struct Hunk {
    std::string old_file;  // tree-relative; empty for file creation
    std::string new_file;  // tree-relative; empty for file deletion
    long old_start = 0, old_count = 0;  // 1-based start; 0-count hunks anchor after old_start
    long new_start = 0, new_count = 0;
    std::string section;  // trailing text of the @@ header, if any
    std::vector<DiffLine> lines;

    const std::string& target_file() const { return new_file.empty() ? old_file : new_file; }
};

struct PatchDocument {
    std::vector<Hunk> hunks;
    std::string raw_text;  // original bytes, preserved verbatim
};

/// Parses a unified diff. Accepts multi-file documents, git-style a/ b/
/// prefixes (stripped), and /dev/null for creation and deletion. Declared
/// hunk line counts must match the body. Throws DiffSyntaxError or
/// EmptyDiffError.
PatchDocument parse_unified_diff(const std::string& text);

/// Swaps the two sides of a patch so that applying the result reverts it.
PatchDocument invert(const PatchDocument& doc);

/// A file as a list of lines plus the trailing-newline flag.
struct FileLines {
    std::vector<std::string> lines;
    bool final_newline = true;
};

FileLines split_lines(const std::string& content);
std::string join_lines(const FileLines& file);

/// Applies the document to files rooted at `root`, in place. Context and
/// removed lines must match exactly at the declared positions (no fuzz, no
/// offset search). Throws NotApplicableError on any mismatch.
void apply_in_place(const PatchDocument& doc, const fs::path& root);

}  // namespace rgt
