pub mod harmonics;
pub mod needlet;
pub mod cubature;
pub mod report;
pub mod field;
pub mod gof;
pub mod scale;
pub mod window;
