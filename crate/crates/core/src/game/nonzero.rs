use super::{Coalition, CoalitionGame};
use crate::error::{Error, Result};

/// Decides `Shapley(a) > 0` for a monotone game from a family of candidate
/// winning sets that contains every minimal winning coalition.
///
/// In a monotone game the value of `a` is positive iff `a` belongs to some
/// minimal winning coalition, and for any winning `S ∋ a` with
/// `v(S∖{a}) = 0`, the marginal of `a` at `S∖{a}` is 1.
pub fn shapley_nonzero<I>(game: &impl CoalitionGame, a: usize, supports: I) -> Result<bool>
where
    I: IntoIterator<Item = Result<Coalition>>,
{
    if a >= game.player_count() {
        return Err(Error::UnknownPlayer(format!("player #{a}")));
    }
    for support in supports {
        let mut s = support?;
        if !s.contains(a) || !game.value(&s) {
            continue;
        }
        s.set(a, false);
        if !game.value(&s) {
            return Ok(true);
        }
    }
    Ok(false)
}
