pub mod criteria;
pub mod cyclotomic;
pub mod exec;
pub mod grouprings;
pub mod lattice;
pub mod numtheory;
pub mod table;
pub mod weilsearch;
