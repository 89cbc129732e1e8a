#pragma once

#include "weaver/slicer.hpp"
#include "weaver/trace.hpp"

#include <string>

namespace weaver {

/// Appends execution in-lines to every retained executable statement of a
/// rendered slice: `# (k) name = value; …` for the first visit, followed by
/// ` | (k) …` for the last visit when the line ran more than once, and
/// `# not executed` otherwise. The target line is additionally marked
/// `<-- target`. Names shown are those the statement reads or writes that
/// have a recorded value. Events are mapped from the unit's lines through
/// `slice.line_map`; events from other files are ignored.
///
/// Removing the comments from the result yields the comment-free rendered
/// slice. Throws LineMismatch when an event names a line outside `unit`.
std::string annotate_slice(const Slice& slice, const SourceUnit& unit, const ExecutionTrace& trace);

}  // namespace weaver
