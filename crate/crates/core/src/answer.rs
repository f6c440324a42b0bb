use std::fmt;

/// Reply to a query operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Answer {
    Yes,
    No,
}

impl Answer {
    pub fn is_yes(self) -> bool {
        self == Answer::Yes
    }

    /// The single-letter form used in answer files.
    pub fn as_char(self) -> char {
        match self {
            Answer::Yes => 'Y',
            Answer::No => 'N',
        }
    }
}

impl From<bool> for Answer {
    fn from(b: bool) -> Self {
        if b {
            Answer::Yes
        } else {
            Answer::No
        }
    }
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}
