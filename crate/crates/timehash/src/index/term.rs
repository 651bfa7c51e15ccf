use std::fmt;
use std::hash::{Hash, Hasher};

/// Longest index term: a 16-byte prefix plus the longest key.
pub const MAX_TERM_LEN: usize = 40;
pub const MAX_PREFIX_LEN: usize = MAX_TERM_LEN - crate::keygen::MAX_KEY_LEN;

/// An index term stored inline so building and probing never allocate.
#[derive(Clone, Copy)]
pub struct Term {
    buf: [u8; MAX_TERM_LEN],
    len: u8,
}

impl Term {
    pub fn new(text: &str) -> Option<Term> {
        Term::with_prefix(text.as_bytes(), b"")
    }

    pub(crate) fn with_prefix(prefix: &[u8], body: &[u8]) -> Option<Term> {
        let len = prefix.len() + body.len();
        if len > MAX_TERM_LEN {
            return None;
        }
        let mut buf = [0u8; MAX_TERM_LEN];
        buf[..prefix.len()].copy_from_slice(prefix);
        buf[prefix.len()..len].copy_from_slice(body);
        Some(Term {
            buf,
            len: len as u8,
        })
    }

    #[inline]
    pub fn as_bytes(&self) -> &[u8] {
        &self.buf[..self.len as usize]
    }

    pub fn as_str(&self) -> &str {
        std::str::from_utf8(self.as_bytes()).expect("terms are built from str")
    }
}

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        self.as_bytes() == other.as_bytes()
    }
}

impl Eq for Term {}

impl Hash for Term {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.as_bytes().hash(state)
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Term {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.as_bytes().cmp(other.as_bytes())
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Term({:?})", self.as_str())
    }
}
