use crate::netgraph::NodeIdx;

/// A monotone submodular set function over nodes, evaluated incrementally.
///
/// `Cover` is the evaluation state for a partial solution; committed nodes
/// (if the objective has any) are already part of [`SetObjective::empty`].
pub trait SetObjective: Sync {
    type Cover: Clone + Send + Sync;

    fn empty(&self) -> Self::Cover;

    fn value(&self, cover: &Self::Cover) -> f64;

    /// `f(S ∪ {v}) − f(S)` for the set `S` behind `cover`.
    fn gain(&self, cover: &Self::Cover, v: NodeIdx) -> f64;

    fn add(&self, cover: &mut Self::Cover, v: NodeIdx);

    fn evaluate(&self, set: &[NodeIdx]) -> f64 {
        let mut c = self.empty();
        for &v in set {
            self.add(&mut c, v);
        }
        self.value(&c)
    }
}
