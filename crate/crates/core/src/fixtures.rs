//! Small hand-checked instances used by tests and the acceptance suite.

use crate::model::IssueProfile;

/// Anscombe's 11-voter, 11-issue profile with an all-ones candidate (0) and
/// an all-zeros candidate (1). The voter majority prefers 1 on every issue,
/// yet every voter but a minority agrees more with the all-zeros candidate.
pub fn anscombe() -> (IssueProfile, IssueProfile) {
    const ROWS: [&str; 11] = [
        "00000001111",
        "11110000000",
        "10000000111",
        "11000000011",
        "11101000000",
        "00011110000",
        "00011111000",
        "11100111111",
        "10111111110",
        "01111111101",
        "01111111111",
    ];
    let voters = IssueProfile::from_fn(11, 11, |j, i| ROWS[j].as_bytes()[i] == b'1').unwrap();
    let candidates = IssueProfile::from_fn(2, 11, |c, _| c == 0).unwrap();
    (voters, candidates)
}

/// Three voters and three representatives over two issues.
///
/// Voters prefer (1,1,0) on both issues. Representatives prefer (1,1,0) on
/// the first issue and (1,0,0) on the second. On the first issue only the
/// third voter delegates; on the second only the first voter does.
pub struct ThreeVoters {
    pub voters: IssueProfile,
    pub representatives: IssueProfile,
    /// Delegating voters per issue.
    pub delegators: [[bool; 3]; 2],
}

pub fn three_voters() -> ThreeVoters {
    ThreeVoters {
        voters: IssueProfile::from_rows(&[[1u8, 1], [1, 1], [0, 0]]).unwrap(),
        representatives: IssueProfile::from_rows(&[[1u8, 1], [1, 0], [0, 0]]).unwrap(),
        delegators: [[false, false, true], [true, false, false]],
    }
}
