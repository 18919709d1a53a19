//! Holds only the `acceptance` test target, which runs every verification
//! suite at full size and reports one line per criterion.
