//! Holds the `acceptance` test target, which checks the numerical criteria
//! of `menger-core` and prints one pass/fail line per criterion. It lives in
//! its own package so that its outcome does not stop other test binaries.
