use crate::graph::LabeledGraph;

pub(crate) const RUNNING_EXAMPLE: &str = include_str!("../data/running_example.tsv");

pub(crate) fn running_example() -> LabeledGraph {
    LabeledGraph::parse(RUNNING_EXAMPLE).unwrap()
}
