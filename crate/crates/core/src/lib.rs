pub mod shapes;
pub mod rules;
pub mod regex_model;
pub mod solver;
pub mod oracle;
pub mod solution;
