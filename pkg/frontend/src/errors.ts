export class SchemaError extends Error {
  override name = "SchemaError";
}

export class NoDataError extends Error {
  override name = "NoDataError";
}
