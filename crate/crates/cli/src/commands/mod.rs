pub mod evaluate;
pub mod inspect;
pub mod prepare;
pub mod train;
