pub mod hhd_oracle;
