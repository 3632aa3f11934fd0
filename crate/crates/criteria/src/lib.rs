//! Holds the `acceptance` test target; run it with
//! `cargo test -p saddlestat-criteria --test acceptance`.
