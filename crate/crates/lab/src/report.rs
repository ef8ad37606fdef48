//! Flat report rows written as CSV with a header equal to the field names.

use std::path::Path;

use lincfa::io::{format_number, write_table};

use crate::Result;

pub trait Cell {
    fn cell(&self) -> String;
}

impl Cell for f64 {
    fn cell(&self) -> String {
        format_number(*self)
    }
}

impl Cell for usize {
    fn cell(&self) -> String {
        self.to_string()
    }
}

impl Cell for u64 {
    fn cell(&self) -> String {
        self.to_string()
    }
}

impl Cell for bool {
    fn cell(&self) -> String {
        self.to_string()
    }
}

impl Cell for String {
    fn cell(&self) -> String {
        self.clone()
    }
}

pub trait Row {
    fn header() -> Vec<&'static str>;
    fn cells(&self) -> Vec<String>;
}

macro_rules! report_row {
    ($(#[$m:meta])* pub struct $name:ident { $($(#[$fm:meta])* pub $f:ident : $t:ty,)* }) => {
        $(#[$m])*
        #[derive(Debug, Clone, PartialEq, serde::Serialize)]
        pub struct $name { $($(#[$fm])* pub $f: $t,)* }

        impl $crate::report::Row for $name {
            fn header() -> Vec<&'static str> {
                vec![$(stringify!($f)),*]
            }
            fn cells(&self) -> Vec<String> {
                use $crate::report::Cell;
                vec![$(self.$f.cell()),*]
            }
        }
    };
}
pub(crate) use report_row;

pub fn write_rows<R: Row>(path: &Path, rows: &[R]) -> Result<()> {
    let body: Vec<Vec<String>> = rows.iter().map(Row::cells).collect();
    write_table(path, &R::header(), &body)?;
    Ok(())
}
