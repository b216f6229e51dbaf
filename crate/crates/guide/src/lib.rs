//! The chapters of the guide in `book/src`, compiled as doc-tests.

macro_rules! chapter {
    ($name:ident, $file:literal) => {
        #[doc = include_str!(concat!("../../../book/src/", $file))]
        pub mod $name {}
    };
}

chapter!(introduction, "introduction.md");
chapter!(conventions, "conventions.md");
chapter!(families, "families.md");
chapter!(classification, "classification.md");
chapter!(lifts, "lifts.md");
chapter!(curvature, "curvature.md");
chapter!(cli, "cli.md");
chapter!(formats, "formats.md");

#[doc = include_str!("../../../README.md")]
pub mod readme {}
