export { ComplexArray, absAt, asComplex, complexAt, shIndex } from './arrays.js';
export { ConfigError, DeismError, IoError, NumericError, errorFromExit } from './errors.js';
export {
  Directivity,
  SampledField,
  Spectrum,
  readDirectivity,
  readSampledField,
  readSpectrum,
  writeDirectivity,
  writeSampledField,
  writeSpectrum,
} from './formats.js';
export { EngineOptions, engineCommand, runEngine } from './cli.js';
export {
  FitResult,
  SimulateOptions,
  SimulateResult,
  fitDirectivity,
  simulate,
} from './simulate.js';
